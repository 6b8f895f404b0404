#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Plot Data Module Initialization
"""
