#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Data Module Initialization
"""
