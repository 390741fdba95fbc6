"""
Ramiforge - Command Handlers
"""
