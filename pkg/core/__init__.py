"""Verdicts, run state and the error hierarchy"""
