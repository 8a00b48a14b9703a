"""Acceptance-scale tests for qmoduli"""
