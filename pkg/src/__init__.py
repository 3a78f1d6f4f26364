"""
asyndgan-desk
Source code package initialization
"""

__version__ = "1.0.0"
__author__ = "asyndgan-desk"
__description__ = "Desk-scale distributed conditional GAN: one central generator, many private discriminators"
