"""Coverage matrix, dilation and the set-cover solvers."""
