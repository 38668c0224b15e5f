# tests/__init__.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

# Test package
