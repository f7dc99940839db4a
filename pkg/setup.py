from setuptools import setup, find_packages

with open("README.md") as f:
    LONG_DESC = f.read()

setup(
    name="catmap",
    version="0.1",
    description="Numerical laboratory for the quantized cat map",
    author="catmap developers",
    long_description=LONG_DESC,
    long_description_content_type="text/markdown",
    entry_points={
        "console_scripts": [
            "catmap = catmap.scripts.catmap_run:main",
        ]
    },
    packages=find_packages(),
    package_data={"": ["*.yml"]},
    python_requires=">=3.11",
    install_requires=["reportengine<0.32", "numpy", "scipy", "pandas", "tqdm"],
    extras_require={"test": ["pytest", "hypothesis"]},
    zip_safe=False,
)
