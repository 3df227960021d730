"""Mixed indentation widths across suites."""
import os

class Box:
  def __init__(self, size):
    self.size = size
    if size > 10:
            self.kind = "big"
    else:
            self.kind = "small"

def fill(box, items):
	total = 0
	for_label = {
        "box": box,
        "items": items,
    }
	if box.size:
		total = box.size
	return (total, for_label)
