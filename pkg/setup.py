#!/usr/bin/env python
# coding: utf8

from setuptools import setup, find_packages


# Figure out the version; this could be done by importing the
# module, though that requires dependencies to be already installed,
# which may not be the case when processing a pip requirements
# file, for example.
def parse_version(assignee):
    import os, re
    here = os.path.dirname(os.path.abspath(__file__))
    version_re = re.compile(
        r'%s = (\(.*?\))' % assignee)
    with open(os.path.join(here, 'prunetree', '__init__.py')) as fp:
        for line in fp:
            match = version_re.search(line)
            if match:
                version = eval(match.group(1))
                return ".".join(map(str, version))
        else:
            raise Exception("cannot find version")
version = parse_version('__version__')


setup(
    name='prunetree',
    version=version,
    license='BSD',
    description='Generalized dynamical pruning of plane trees, critical '
                'Galton-Watson trees and ballistic annihilation with sinks.',
    long_description=open('README.rst').read(),
    packages=find_packages(exclude=('tests',)),
    package_data={'prunetree': ['schemas/*.json']},
    zip_safe=False,
    platforms='any',
    python_requires='>=3.8',
    install_requires=[
        'Django>=3.2',
        'numpy>=1.20',
        'scipy>=1.7',
        ],
    classifiers=[
        'Framework :: Django',
        'Framework :: Django :: 3.2',
        'Framework :: Django :: 4.2',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    tests_require=[
        'pytest',
    ],
    entry_points = {
        'console_scripts': [
            'prunetree = prunetree.script:main',
        ],
        # make plugin available to pytest
        'pytest11': [
            'prunetree = prunetree.pytest_plugin',
        ]
    },
)
