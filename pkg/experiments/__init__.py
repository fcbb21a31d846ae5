"""Experiment registries routed by the CLI"""
