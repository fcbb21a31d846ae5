"""Pre-run parameter validation"""
