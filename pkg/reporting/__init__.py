"""Report envelopes, digests and serialization"""
