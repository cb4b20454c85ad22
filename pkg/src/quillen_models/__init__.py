"""Persistence Quillen models: free dg Lie models of filtered cell complexes,
their homotopy and homology barcodes, and interleaving distances."""

from .cecobar import (CDGCoalgebra, FiniteDGL, adjunction_homology_check, ce_construction, dualize,
                      quillen_construction)
from .freelie import (FreeDGL, FreeLieAlgebra, Generator, LieElement, LieMorphism,
                      TruncationError, hall_basis)
from .models import (Cell, CellComplexDescription, Stage, attach_cells, ce_projection, h_star,
                     minimalize, pi_star, point_model, skeletal_persistence_model, sphere_model)
from .persist import (INF, Barcode, GradedModule, Grid, InterleavingCertificate, ModuleMorphism,
                      barcode, interleaving_distance, pushforward, verify_interleaving)
from .pipeline import (PersistenceQuillenModel, StabilityReport, build_persistence_model, h_barcode,
                       pi_barcode, stability_report)

__all__ = [
    "INF", "Barcode", "CDGCoalgebra", "Cell", "CellComplexDescription", "FiniteDGL", "FreeDGL",
    "FreeLieAlgebra", "Generator", "GradedModule", "Grid", "InterleavingCertificate", "LieElement",
    "LieMorphism", "ModuleMorphism", "PersistenceQuillenModel", "Stage", "StabilityReport",
    "TruncationError", "adjunction_homology_check", "attach_cells", "barcode",
    "build_persistence_model", "ce_construction", "ce_projection", "dualize", "h_barcode",
    "h_star", "hall_basis", "interleaving_distance", "minimalize", "pi_barcode", "pi_star",
    "point_model", "pushforward", "quillen_construction", "skeletal_persistence_model",
    "sphere_model", "stability_report", "verify_interleaving",
]
