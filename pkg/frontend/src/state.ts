import { Label, SegmentCard } from "./types.js";

/**
 * In-memory session state: the cards in manifest order plus focus and
 * progress. Label mutations go through applyLabel, which callers invoke
 * only after the server acknowledged the POST — the UI never shows a label
 * the server doesn't have.
 */
export class SessionState {
  private cards: SegmentCard[];
  private focus = 0;

  constructor(cards: SegmentCard[]) {
    this.cards = cards.map((c) => ({ ...c }));
  }

  get size(): number {
    return this.cards.length;
  }

  all(): readonly SegmentCard[] {
    return this.cards;
  }

  card(index: number): SegmentCard {
    const c = this.cards[index];
    if (!c) throw new RangeError(`no card at index ${index}`);
    return c;
  }

  labeledCount(): number {
    return this.cards.filter((c) => c.label !== null).length;
  }

  /** Progress indicator text, e.g. "0 / 120". */
  progressText(): string {
    return `${this.labeledCount()} / ${this.cards.length}`;
  }

  complete(): boolean {
    return this.cards.length > 0 && this.labeledCount() === this.cards.length;
  }

  focusedIndex(): number {
    return this.focus;
  }

  focusedCard(): SegmentCard | null {
    return this.cards[this.focus] ?? null;
  }

  setFocus(index: number): void {
    if (this.cards.length === 0) return;
    this.focus = Math.min(Math.max(index, 0), this.cards.length - 1);
  }

  moveFocus(delta: number): void {
    this.setFocus(this.focus + delta);
  }

  /** Record a server-acknowledged label. Relabeling is last-write-wins. */
  applyLabel(segmentFile: string, label: Label): void {
    const card = this.cards.find((c) => c.segment_file === segmentFile);
    if (!card) throw new RangeError(`unknown segment ${segmentFile}`);
    card.label = label;
  }

  /**
   * Where focus should land after labeling the card at `index`: the next
   * unlabeled card, wrapping around once, else simply the next card.
   */
  nextAfter(index: number): number {
    for (let j = index + 1; j < this.cards.length; j++) {
      if (this.cards[j].label === null) return j;
    }
    for (let j = 0; j < index; j++) {
      if (this.cards[j].label === null) return j;
    }
    return Math.min(index + 1, this.cards.length - 1);
  }
}
