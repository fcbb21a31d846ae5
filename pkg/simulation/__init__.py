"""One global-coin iteration and the agreement loop built on it"""
