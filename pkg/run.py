#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Fairness Audit Command Line Runner
"""

from dotenv import load_dotenv
from flask.cli import FlaskGroup

from app import create_app
from app.cli import UsageExitMixin

# Load environment variables
load_dotenv()


class AuditGroup(UsageExitMixin, FlaskGroup):
    """Command group of the audit application"""


cli = AuditGroup(create_app=create_app, add_default_commands=False, load_dotenv=False)

if __name__ == "__main__":
    cli()
