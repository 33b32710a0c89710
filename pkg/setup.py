from setuptools import find_packages, setup

from sbp import __version__

setup(
    name="django_sbp",
    version=__version__,
    packages=find_packages(exclude=["tests", "tests.*"]),
    license="APL2",
    description="Deterministic simulation-based programming runtime",
    include_package_data=True,
    install_requires=[
        "Django>=3.2",
    ],
    entry_points={
        "console_scripts": [
            "sbp = sbp.cli:main",
        ],
    },
    long_description=open("README.rst").read(),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Framework :: Django",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering",
        "Framework :: Django :: 3.2",
        "Framework :: Django :: 4.2",
    ],
    zip_safe=False,  # the scenario fixtures are read from the package directory
)
