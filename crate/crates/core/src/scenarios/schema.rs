//! Field ranges and category lists for synthetic credit delinquency cases.
//!
//! The label lists are the single source of truth for the categorical
//! fields; serialized files use the snake_case names below.

use serde::{Deserialize, Serialize};

pub const CRAD_VERSION: u32 = 1;

pub const ORIGINAL_AMOUNT: (f64, f64) = (20_688.0, 49_775.0);
pub const OUTSTANDING_BALANCE: f64 = 15_700.0;
pub const DAYS_OVERDUE: (u32, u32) = (32, 359);
pub const INTEREST_ACCRUED: (f64, f64) = (165.0, 1_853.0);
pub const RECOVERY_PROBABILITY: (f64, f64) = (5.0, 89.33);
pub const TARGET_DAYS: (u32, u32) = (7, 90);

/// Creditor's target timeline: a quarter of the days overdue, clamped to `TARGET_DAYS`.
pub fn target_days_for(days_overdue: u32) -> u32 {
    let quarter = (f64::from(days_overdue) / 4.0).round() as u32;
    quarter.clamp(TARGET_DAYS.0, TARGET_DAYS.1)
}

macro_rules! category {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            pub fn from_label(label: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|c| c.label() == label)
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

category!(
    /// Credit facility type (7 categories).
    CreditType {
        WorkingCapital => "working_capital",
        CommercialMortgage => "commercial_mortgage",
        EquipmentFinancing => "equipment_financing",
        TermLoan => "term_loan",
        RevolvingCreditLine => "revolving_credit_line",
        TradeFinance => "trade_finance",
        InvoiceFinancing => "invoice_financing",
    }
);

category!(
    Collateral {
        Inventory => "inventory",
        RealEstate => "real_estate",
        Equipment => "equipment",
    }
);

category!(
    /// Reason the account fell overdue (10 categories).
    OverdueReason {
        Bankruptcy => "bankruptcy",
        SupplyChainIssues => "supply_chain_issues",
        MarketDownturn => "market_downturn",
        LossOfMajorClient => "loss_of_major_client",
        ManagementIssues => "management_issues",
        RegulatoryChanges => "regulatory_changes",
        NaturalDisaster => "natural_disaster",
        Fraud => "fraud",
        RisingOperatingCosts => "rising_operating_costs",
        SeasonalRevenueDrop => "seasonal_revenue_drop",
    }
);

category!(
    /// Recovery phase, earliest first (6 phases).
    RecoveryStage {
        EarlyDelinquency => "early_delinquency",
        MidDelinquency => "mid_delinquency",
        LateDelinquency => "late_delinquency",
        Default => "default",
        LegalRecovery => "legal_recovery",
        WriteOff => "write_off",
    }
);

category!(
    /// Ordinal cash-flow condition, worst first.
    CashFlowSituation {
        CompleteBreakdown => "complete_breakdown",
        SevereDistress => "severe_distress",
        ModerateStrain => "moderate_strain",
        TemporaryDisruption => "temporary_disruption",
    }
);

category!(
    ProposedSolution {
        CollateralLiquidation => "collateral_liquidation",
        DebtRestructuring => "debt_restructuring",
        PaymentPlan => "payment_plan",
        PartialSettlement => "partial_settlement",
        Refinancing => "refinancing",
        AssetSale => "asset_sale",
    }
);
