#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Fairness Module Initialization
"""
