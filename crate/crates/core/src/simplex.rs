//! Transportation simplex (stub).
