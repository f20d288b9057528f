#!/usr/bin/env python3
"""
Setup script for truncated-evi.

This file provides backward compatibility for systems that don't support
pyproject.toml. The primary build configuration is in pyproject.toml.
"""

import os

from setuptools import setup  # type: ignore


def read_readme() -> str:
    """Read README.md for the long description."""
    readme_path = os.path.join(os.path.dirname(__file__), 'README.md')
    if os.path.exists(readme_path):
        with open(readme_path, 'r', encoding='utf-8') as f:
            return f.read()
    return "Tail index estimation for randomly right-truncated heavy-tailed data"


setup(
    name="truncated-evi",
    version="1.0.0",
    author="Tail Estimation Team",
    author_email="contact@example.com",
    description="Tail index and extreme quantile estimation for randomly right-truncated heavy-tailed data",
    long_description=read_readme(),
    long_description_content_type="text/markdown",
    url="https://github.com/yourusername/truncated-evi",
    classifiers=[
        "Development Status :: 5 - Production/Stable",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "Environment :: Console",
    ],
    py_modules=[
        "app", "cli", "config", "data_io", "errors", "estimators",
        "experiments", "logging_utils", "models", "theory",
    ],
    packages=["visualizers"],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.21.0",
        "scipy>=1.7.0",
        "pandas>=1.3.0",
    ],
    extras_require={
        "plot": [
            "PySide6>=6.2.0",
            "pyqtgraph>=0.12.0",
        ],
        "dev": [
            "black>=22.0.0",
            "pylint>=2.12.0",
            "mypy>=0.910",
            "pytest>=7.0.0",
            "pytest-cov>=3.0.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "truncated-evi=app:main",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
