"""Exact walk distributions"""
