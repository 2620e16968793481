"""
Gray-level image binarization toolkit - Core Package

Global, dynamic and temporal minimum-error thresholding for machine vision
inspection lines, with conveyor speed compensation and a synthetic
acquisition simulator.
"""

__version__ = "1.0.0"
