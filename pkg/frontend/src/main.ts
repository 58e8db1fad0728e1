/** Browser entry point: wires the API client, store, keyboard controller, and
 * renderer together against the backend named by ?api= (same origin default). */

import { ApiClient } from "./api.js";
import { KeyboardController } from "./keyboard.js";
import { ReviewStore } from "./store.js";
import { renderApp } from "./view.js";

export function bootstrap(root: HTMLElement, baseUrl: string): ReviewStore {
  const api = new ApiClient(baseUrl);
  const store = new ReviewStore(api);

  const keyboard = new KeyboardController({
    next: () => store.selectNext(),
    previous: () => store.selectPrevious(),
    accept: () => {
      const item = store.selectedItem();
      if (item) void store.submitVerdict(item.item_id, true);
    },
    reject: (author) => {
      const item = store.selectedItem();
      if (item) void store.submitVerdict(item.item_id, false, author);
    },
    authorCount: () => store.getState().status?.n_authors ?? 0,
  });
  keyboard.attach(window);

  store.subscribe(() => renderApp(root, store));
  void store.refreshStatus().then(() => store.refreshQueue());
  return store;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  bootstrap(document.getElementById("app")!, params.get("api") ?? "");
}
