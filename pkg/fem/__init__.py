"""Finite element core: Tet10 cube meshes, periodic pairing, neo-Hooke assembly and Newton solver"""
