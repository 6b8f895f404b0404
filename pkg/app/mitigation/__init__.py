#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Bias Mitigation Module Initialization
"""
