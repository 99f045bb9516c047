# This file makes scripts a proper Python subpackage