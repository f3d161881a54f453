"""Bundled scenario files"""
