"""Offline reduction: POD, clustered local bases, manifold learning and linearisation"""
