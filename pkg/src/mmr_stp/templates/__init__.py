"""LP model templates."""
