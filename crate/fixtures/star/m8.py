"""Assignment shapes: chained, annotated, augmented."""

first = second = 0
count: int = 1
count += 1
label = "x"
_shadow = "hidden"
