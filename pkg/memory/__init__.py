"""Persistent run records"""
