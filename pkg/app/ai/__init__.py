#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Model Training Module Initialization
"""
