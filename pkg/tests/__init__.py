"""
Test package for asyndgan-desk
Unit, protocol, orchestration and acceptance tests
"""

# Import test modules as needed
