"""
Namespace package for project apps.
"""
