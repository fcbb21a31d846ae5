"""Protocol parameters, derived thresholds and constant chains"""
