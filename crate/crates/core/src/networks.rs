//! Sample networks shipped with the library.

pub const EXAMPLE_ISOLATED: &str = include_str!("../networks/example_isolated.crn");
pub const EXAMPLE_ISOTHERMAL: &str = include_str!("../networks/example_isothermal.crn");
pub const TRIANGLE_BALANCED: &str = include_str!("../networks/triangle_balanced.crn");
pub const TRIANGLE_UNBALANCED: &str = include_str!("../networks/triangle_unbalanced.crn");
pub const ISOLATED_MIXED: &str = include_str!("../networks/isolated_mixed.crn");
pub const OPEN_IO_HE: &str = include_str!("../networks/open_io_he.crn");
pub const HEAT_ONLY: &str = include_str!("../networks/heat_only.crn");
pub const LUXR: &str = include_str!("../networks/luxr.crn");

/// `(file name, contents)` of every bundled network.
pub const ALL: [(&str, &str); 8] = [
    ("example_isolated.crn", EXAMPLE_ISOLATED),
    ("example_isothermal.crn", EXAMPLE_ISOTHERMAL),
    ("triangle_balanced.crn", TRIANGLE_BALANCED),
    ("triangle_unbalanced.crn", TRIANGLE_UNBALANCED),
    ("isolated_mixed.crn", ISOLATED_MIXED),
    ("open_io_he.crn", OPEN_IO_HE),
    ("heat_only.crn", HEAT_ONLY),
    ("luxr.crn", LUXR),
];
