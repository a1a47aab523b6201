from setuptools import setup, find_packages

setup(
    name="shellmodal",
    version="1.0.0",
    description="Nonlinear modal analysis of graphene sheets and carbon nanotubes with isogeometric Kirchhoff-Love shells",
    long_description=open("README.md", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    author="shellmodal developers",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main", "shellmodal_cli"],
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.8",
        "sympy>=1.10",
        "prompt_toolkit>=3.0.48",
        "rich>=13.0.0",
        "colorama>=0.4.6",
        "tenacity>=9.0.0",
    ],
    extras_require={
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "shellmodal=shellmodal_cli:main",
        ],
    },
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
)
