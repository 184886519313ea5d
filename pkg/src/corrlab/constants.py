"""Centralized numeric tolerances.

Every module pulls its tolerances from here so the accuracy contract is
stated in one place: algebraic residuals (polynomial/matrix identities),
geometric comparisons in the chordal metric, and coarse classification
decisions each get their own scale.
"""

# Residual scale for algebraic identities (root residuals, determinants).
ALGEBRAIC_TOL = 1e-12

# Point comparisons on the Riemann sphere (chordal metric).
CHORDAL_TOL = 1e-10

# Classification decisions: membership, time-reversal, escape labeling.
CLASS_TOL = 1e-8

# Group-relation residuals for Moebius representations.
RELATION_TOL = 1e-9

# |z| beyond this is routed through the chart swap z -> 1/z.
INF_THRESHOLD = 1e8

# Jorgensen's inequality is attained exactly by some discrete groups, so
# a violation is only certified below 1 by this margin.
JORGENSEN_MARGIN = 1e-6
