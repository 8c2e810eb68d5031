// Display formatting. Scores are shown at fixed precision; the underlying
// value is always the API's, never a recomputation.

export const SCORE_DECIMALS = 4;

export function formatScore(value: number): string {
  return value.toFixed(SCORE_DECIMALS);
}

export function formatRate(value: number | null): string {
  return value === null ? "n/a" : value.toFixed(4);
}

export function formatCount(value: number): string {
  return String(value);
}
