"""Coin matrices and spectral-norm checks"""
