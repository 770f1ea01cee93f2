#!/usr/bin/env python

from setuptools import find_packages, setup

from ustatconc import __version__

with open('README.md', 'r') as f:
    long_description = f.read()

setup(
    name='ustatconc',
    version=__version__,
    author='Daichi Narushima',
    author_email='dnarsil+github@gmail.com',
    description='Concentration Bounds for Poisson U-statistics',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=['tests']),
    include_package_data=True,
    install_requires=['docopt', 'networkx', 'numpy', 'pandas', 'scipy'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['ustatconc=ustatconc.cli:main']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU Affero General Public License v3 or later (AGPLv3+)',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics'
    ],
    python_requires='>=3.8'
)
