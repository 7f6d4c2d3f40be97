// Ring fill style: dark red core fading outward with the forecast horizon.

export const RING_HUE = "#c0150a";

export const RING_OPACITY: Record<number, number> = {
  0: 0.9,
  15: 0.7,
  30: 0.5,
  45: 0.3,
  60: 0.15,
};

/** Fill opacity for a ring horizon; interpolates unknown horizons so
 * non-default ring intervals still fade monotonically. */
export function ringOpacity(minutes: number): number {
  if (minutes in RING_OPACITY) return RING_OPACITY[minutes]!;
  const t = Math.min(Math.max(minutes / 60, 0), 1);
  return 0.9 - t * 0.75;
}

export function legendEntries(ringMinutes: number[]): { minutes: number; opacity: number }[] {
  return [...ringMinutes].sort((a, b) => a - b).map((m) => ({ minutes: m, opacity: ringOpacity(m) }));
}
