# Tests for geopersist
