"""Random-walk streams and adversarial stopping"""
