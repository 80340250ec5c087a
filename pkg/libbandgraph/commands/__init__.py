"""
.. module:: commands
    :platform: Linux
    :synopsis: batch commands discovered at runtime
"""
