"""Online reduced-order models and their reduced Newton solvers"""
