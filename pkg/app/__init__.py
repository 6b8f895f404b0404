#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Application Initialization Module
"""

import logging
import os

from flask import Flask


def create_app(test_config=None):
    """Create and configure the fairness audit application"""

    # Create Flask application
    app = Flask(__name__, instance_relative_config=True)

    # Configure application
    app.config.from_mapping(
        FAIRNESS_EPSILON=float(os.getenv("FAIRNESS_EPSILON", 0.8)),
        FAIRNESS_SEED=int(os.getenv("FAIRNESS_SEED", 42)),
        FAIRNESS_OUTPUT_DIR=os.getenv("FAIRNESS_OUTPUT_DIR", "fairness_reports"),
        FAIRNESS_BINS=int(os.getenv("FAIRNESS_BINS", 20)),
        FAIRNESS_GRID_STEP=float(os.getenv("FAIRNESS_GRID_STEP", 0.01)),
        LOG_LEVEL=os.getenv("LOG_LEVEL", "INFO"),
    )
    if test_config is not None:
        # Load test configuration
        app.config.from_mapping(test_config)

    # Configure logging to stderr
    logging.basicConfig(
        level=getattr(logging, str(app.config["LOG_LEVEL"]).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    # Register commands
    from app.cli import cli_bp
    app.register_blueprint(cli_bp)

    return app
