"""Artifact persistence: MOR1 matrix container and directory-backed repositories"""
