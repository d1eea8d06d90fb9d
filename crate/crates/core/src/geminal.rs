//! Geminal representation search. (Under construction.)
