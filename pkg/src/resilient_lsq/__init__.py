"""Byzantine-resilient distributed least squares over directed networks."""
