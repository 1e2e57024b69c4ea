RATES = {"eu": 0.2, "us": 0.07}


def apply_tax(amount, region):
    """Apply the configured regional tax rate.

    Args:
        amount: Pre-tax total.
        region: Rate table key.

    Returns:
        Amount with tax applied.
    """
    rate = RATES.get(region, 0.0)
    return amount * (1.0 + rate)


def _chase(n):
    if n <= 0:
        return 0
    return _dodge(n - 1)


def _dodge(n):
    return _chase(n - 1)
