from .test_space import (AFreeTestSpace, build_test_space, constraint_residual, laminate_field, project_afree,
                         project_spectrum, random_afree_field)
