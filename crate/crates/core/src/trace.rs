//! Exact rational geodesic tracing. (Under construction.)
