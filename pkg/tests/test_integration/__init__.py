# Integration tests for the annihilator CLI
