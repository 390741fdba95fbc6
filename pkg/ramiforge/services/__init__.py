"""
Ramiforge - Services
"""
