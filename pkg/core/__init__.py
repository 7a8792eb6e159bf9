"""Core module for shared utilities and abstractions"""
