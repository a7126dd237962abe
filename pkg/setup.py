from setuptools import setup, find_packages

setup(
    name="bose_gibbs",
    version="0.1.0",
    description="Effective theories and correlation inequalities for the mean-field Bose gas",
    author="Nick Guerriero",
    author_email="nickguerriero@example.com",
    packages=find_packages(include=["bose_gibbs", "bose_gibbs.*"]),
    install_requires=[
        # runtime dependencies
        "numpy",
        "scipy",
        "python-json-logger",
        "python-dotenv",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-timeout>=2.4.0",
            "flake8",
        ],
    },
    entry_points={
        "console_scripts": [
            "bose-gibbs=bose_gibbs.cli:main",
        ],
    },
)
