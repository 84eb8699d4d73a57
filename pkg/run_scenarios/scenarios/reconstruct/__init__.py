from .reconstruct_scenario import ReconstructScenario, METHODS

__all__ = ['ReconstructScenario', 'METHODS']
