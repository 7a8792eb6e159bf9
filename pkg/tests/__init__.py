"""Test module"""
