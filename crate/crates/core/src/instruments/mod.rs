//! Bonds, Z-spreads, the Z-index, December futures and the C-spread.

pub mod bond;
pub mod futures;
pub mod zindex;

pub use bond::{bond_cash_flows, price_with_spread, z_spread, BondQuote, CashFlow, FixedCouponBond, Z_SPREAD_BRACKET};
pub use futures::{
    build_c_spread_series, build_c_spread_series_with_roll, c_spread_point, c_spread_series, in_roll_month,
    in_roll_window, select_front_december, select_front_december_with_roll, CSpreadPoint, FuturesQuote, SpotProxy,
    DEFAULT_ROLL_MONTHS,
};
pub use zindex::{
    issuer_z_spread_interpolated, issuer_z_spread_weighted, z_index, z_index_point, BondSpread, IssuerRecord,
    ZIndexPoint, ZIndexVariant, ZIndexWeighting,
};
