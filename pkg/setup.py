from setuptools import setup, find_packages

setup(
    name="cvsstemporal",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    install_requires=[
        "scipy>=1.7",
        "pandas>=1.5",
        "python-dateutil>=2.8",
    ],
    extras_require={
        "test": ["pytest>=7.0", "numpy>=1.21", "cvss>=2.0"],
    },
    entry_points={
        "console_scripts": [
            "cvsstemporal=cvsstemporal:main",
        ],
    },
    author="cvsstemporal contributors",
    author_email="example@example.com",
    description="CVSS v2 scoring with scope-aware impact weights and time-decaying exploitability",
    keywords="cvss, vulnerability, nvd, exploit-db, risk scoring",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Information Technology",
        "Topic :: Security",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
)
