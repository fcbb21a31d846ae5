"""Seeded Monte Carlo estimation of the corrected claims"""
