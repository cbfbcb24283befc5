import { Client } from './api';
import { Wizard } from './wizard';

declare global {
  interface Window {
    BUGTRAIL_API?: string;
  }
}

function mount(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app mount point');
  new Wizard(root, new Client(window.BUGTRAIL_API ?? ''));
}

if (document.readyState === 'loading') {
  document.addEventListener('DOMContentLoaded', mount);
} else {
  mount();
}
