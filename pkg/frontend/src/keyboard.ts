/** Keyboard-driven review flow.
 *
 *   j / ArrowDown   next item
 *   k / ArrowUp     previous item
 *   a / Enter       accept the selected item
 *   r               arm reject mode (author picker)
 *   1-9, 0          choose the true author while reject mode is armed
 *   Escape          cancel reject mode
 */

export interface KeyboardActions {
  next(): void;
  previous(): void;
  accept(): void;
  reject(author: number): void;
  /** number of candidate authors, to bound the picker */
  authorCount(): number;
}

export interface KeyboardState {
  rejectArmed: boolean;
}

export class KeyboardController {
  readonly state: KeyboardState = { rejectArmed: false };

  constructor(private readonly actions: KeyboardActions) {}

  /** Returns true when the event was consumed. */
  handleKey(event: Pick<KeyboardEvent, "key" | "target">): boolean {
    // never steal keystrokes from form fields
    const target = event.target as { tagName?: string } | null;
    const tag = target?.tagName?.toUpperCase();
    if (tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT") {
      return false;
    }

    if (this.state.rejectArmed) {
      if (event.key === "Escape") {
        this.state.rejectArmed = false;
        return true;
      }
      if (/^[0-9]$/.test(event.key)) {
        // keys 1..9 pick authors 0..8; key 0 picks author 9
        const author = event.key === "0" ? 9 : Number(event.key) - 1;
        if (author < this.actions.authorCount()) {
          this.state.rejectArmed = false;
          this.actions.reject(author);
          return true;
        }
        return false;
      }
      return false;
    }

    switch (event.key) {
      case "j":
      case "ArrowDown":
        this.actions.next();
        return true;
      case "k":
      case "ArrowUp":
        this.actions.previous();
        return true;
      case "a":
      case "Enter":
        this.actions.accept();
        return true;
      case "r":
        this.state.rejectArmed = true;
        return true;
      default:
        return false;
    }
  }

  attach(target: Pick<Window, "addEventListener">): void {
    target.addEventListener("keydown", (event) => {
      if (this.handleKey(event as KeyboardEvent)) {
        (event as KeyboardEvent).preventDefault();
      }
    });
  }
}
