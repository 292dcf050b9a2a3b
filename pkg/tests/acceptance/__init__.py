"""Long-running experiment replication checks."""
