"""Experiment routing"""
