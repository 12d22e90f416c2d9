"""Values published alongside the bundled datasets, used as comparison targets.

Computed results are checked against these and any gap is reported; the
data files themselves are never adjusted to agree.
"""

# label -> (n, n_gt_05, n_le_05, n_le_001) as tabulated for the air-quality meta-analysis
SIGNIFICANCE_COUNTS = {
    "CO": (42, 29, 13, 9),
    "NO2": (66, 30, 36, 16),
    "O3": (71, 40, 31, 11),
    "PM2.5": (37, 23, 14, 8),
    "PM10": (51, 28, 23, 6),
    "SO2": (65, 46, 19, 6),
}

# label -> (rr, lcl, ucl, I^2 %) of the published random-effects pooled estimates
POOLED = {
    "CO": (1.045, 1.029, 1.061, 85.7),
    "PM10": (1.010, 1.008, 1.013, 69.1),
    "PM2.5": (1.023, 1.015, 1.031, 82.8),
    "SO2": (1.011, 1.007, 1.015, 77.1),
    "NO2": (1.018, 1.014, 1.022, 87.6),
    "O3": (1.009, 1.006, 1.011, 87.8),
}

# search-space summary over the 17 audited base papers: field -> (min, Q1, median, Q3, max, mean)
SEARCHSPACE_SUMMARY = {
    "space1": (6, 60, 160, 288, 5120, 450),
    "space2": (4, 16, 32, 256, 512, 118),
    "space3": (96, 1536, 15360, 40960, 89600, 22866),
}

# tolerance used when comparing recomputed p-values with the printed ones
P_TOLERANCE = 2e-3
