#!/usr/bin/env python3
# -*- coding: utf-8 -*-

from setuptools import setup

setup(name='Gfdchemo',
      version='0.1',
      description='generalized finite difference solver for a chemotaxis model '
                  'of E. coli with motility regulation',
      license='MIT',
      packages=['gfdchemo'],
      install_requires=['numpy', 'scipy'],
      data_files=[('clouds', ['clouds/irregular-361.txt'])],
      entry_points={'console_scripts': ['gfdchemo=gfdchemo.cli:main']},
      zip_safe=False)
