#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Configuration, Error and Serialization Utilities
"""
