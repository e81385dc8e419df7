"""Urban-scene analysis toolkit.

Classifies street/aerial scenes as planned vs unplanned, detects people and
transport modes with a single-shot multibox detector, pulls GPS/time from
image metadata, and fuses everything into geo-referenced CSV/GeoJSON records.
"""

__version__ = "0.1.0"
