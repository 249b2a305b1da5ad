from setuptools import setup, find_packages

version = {}
with open("ben_rl/version.py", "r") as version_file:
    exec(version_file.read(), version)
__version__ = version["__version__"]


with open('README.md', 'r') as readme_file:
    long_description = readme_file.read()

setup(
    name='ben-rl',
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    version=__version__,
    description='Bayesian exploration networks: model-free Bayes-adaptive RL with normalizing flows',
    long_description=long_description,
    long_description_content_type='text/markdown',
    install_requires=[
        'distrib-rl',
        'gym>=0.25.0,<0.26',
        'numpy>=1.21.4,<2',
        'scipy>=1.7',
    ],
    extras_require={
        'test': [
            'pytest>=7',
            'hypothesis>=6',
        ],
    },
    entry_points={
        'console_scripts': [
            'ben-rl=ben_rl.Cli.Main:main',
        ],
    },
    python_requires='>=3.8',
    license='Apache 2.0',
    keywords=['bayesian-reinforcement-learning', 'reinforcement-learning', 'normalizing-flows', 'gym', 'machine-learning'],
    classifiers=[
        'Development Status :: 3 - Alpha',
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python :: 3',
        'Operating System :: OS Independent',
    ],
    package_data={}
)
