"""
Replaying a day of weather
==========================

Hourly weather plus a crowd profile go through the controller; each hour
head produces one decision and the fleet state after it.
"""

import datetime as dt
import io
import sys

from domectl.config import Config
from domectl.ingest import CrowdProfileEntry, WeatherRecord
from domectl.simulate import run_replay, write_log

day = dt.date(2019, 6, 1)
temps = [24, 23, 22, 22, 21, 22, 25, 28, 31, 33, 35, 37, 38, 39, 39, 38, 36, 34, 31, 29, 27, 26, 25, 24]
weather = [WeatherRecord(day, h, 0, float(t), 30.0, rain=h in (15, 16)) for h, t in enumerate(temps)]

# crowd peaks around the noon and evening prayers
ratios = [5, 3, 2, 2, 30, 45, 20, 10, 10, 12, 15, 40, 85, 70, 30, 55, 60, 40, 75, 65, 80, 35, 15, 8]
start = dt.datetime.combine(day, dt.time())
profile = [CrowdProfileEntry(start + dt.timedelta(hours=h), float(r), source="synthetic")
           for h, r in enumerate(ratios)]

###############################################################################
# Run and print the log

entries = run_replay(weather, profile, Config())
summary = write_log(sys.stdout, entries)

###############################################################################
# Hours where the domes stay shut

print([e.timestamp.strftime("%H:%M") for e in entries if e.open_seconds == 0])
print(f"total open time {summary.open_seconds_total / 60:.1f} min over {summary.hours} h")
