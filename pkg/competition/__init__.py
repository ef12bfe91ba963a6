"""Two-type competition on configuration-model random graphs."""
