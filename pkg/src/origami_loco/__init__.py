"""Crawl dynamics and swim-gait planning for a multi-locomotion origami robot."""

__version__ = "0.1.0"
