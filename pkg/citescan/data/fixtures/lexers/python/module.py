#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Module docstring # not a comment"""

x = "hash # inside"  # trailing comment
y = '''
# still a string
'''
z = 'a' # after 'single'
## double hash
