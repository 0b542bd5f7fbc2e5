"""Surface sampling, inside tests and inner-ball candidate generation."""
