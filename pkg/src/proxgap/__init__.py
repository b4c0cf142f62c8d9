"""proxgap: duality-gap convergence monitors for small adversarial generative models."""

__version__ = "0.1.0"
