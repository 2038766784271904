from .query import (FieldSource, PHI_KINDS, RecoveryOptions, RelaxationQuery, admissibility_residual,
                    ambient_grid, check_admissible, quadrature_rule, sample_source, source_on_grid)
from .generators import FIELD_LABELS, resolve_field_source
from .relaxed import CellSolver, PointEnvelope, RelaxedIntegral, relaxed_integral
from .recovery import (ProjectionReport, RecoveryField, frozen_coefficient_defect, glue_tiles, project_recovery,
                       recovery_sequence, tile_centers, transition_depth)
from .theorem import (DefectEntry, LadderEntry, RelaxationReport, SequenceTable, TheoremGap, defect_ladder,
                      recovery_ladder, sequence_energy, theorem_gap)


def relaxation_handler(query: RelaxationQuery) -> RelaxationReport:
    return theorem_gap(query)
